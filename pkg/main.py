import sys

import env  # noqa: F401  loads .env before config defaults are read
from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
