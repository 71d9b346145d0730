DEBUG = False           # set to True for verbose Django error pages and DEBUG-level logging
LOG_LEVEL = 'INFO'      # level of the console log handler (DEBUG shows grid and kernel construction)
OUTPUT_ROOT = 'output'  # directory under which runs, sweeps and Picard reports are written by default
REDIS_URL = 'redis://localhost:6379'  # broker for the dramatiq workers that run sweep rows
SECRET_KEY = ''         # see https://docs.djangoproject.com/en/4.2/ref/settings/#secret-key
SWEEP_QUEUE = 'sweeps'  # dramatiq queue that receives sweep rows sent with --enqueue
VACUUM_FLOOR = 1e-12    # smallest admissible density (and shifted sound speed) before a run is stopped
