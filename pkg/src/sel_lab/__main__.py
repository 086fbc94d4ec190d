import sys

from sel_lab.cli import main

sys.exit(main())
