import sys

from catgate.main import main

sys.exit(main())
