#!/usr/bin/env python
"""
svct command-line script
Runs the CLI from a source checkout without installing the package.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
