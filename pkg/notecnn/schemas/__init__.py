from .cohort import *
from .config import *
from .metrics import *
