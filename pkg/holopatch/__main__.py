import sys

from holopatch.cli import main

sys.exit(main())
