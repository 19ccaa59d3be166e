# Area: Shared
# PRD: docs/prd-bonecloth.md
"""Allow running CLI as: python -m bonecloth"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
