#!/usr/bin/env python3
"""
Matricial W1 command line

    python w1_cli.py w1 problem.json --out certificate.json
    python w1_cli.py table1 --out table1.csv
"""

import os
import sys

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))

from matrix_w1.cli import main

if __name__ == "__main__":
    sys.exit(main())
