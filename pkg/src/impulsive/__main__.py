import sys

from impulsive.cli import main

sys.exit(main())
