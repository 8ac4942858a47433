import sys

from kgretrieve.cli import main

sys.exit(main())
