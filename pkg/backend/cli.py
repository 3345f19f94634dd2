#!/usr/bin/env python3
"""
ChiralCalc - command-line entry point
Exact residues, Fourier transforms, convolutions and verification suites
"""

import sys

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
