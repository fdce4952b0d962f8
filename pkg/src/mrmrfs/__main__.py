import sys

from mrmrfs.cli import main

sys.exit(main())
