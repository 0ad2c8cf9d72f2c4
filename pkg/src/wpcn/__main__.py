import sys

from wpcn.cli import main

sys.exit(main())
