# Partitioned Bloom Lab core package
from .errors import *
from .hashing import *
from .bitvector import *
from .filters import *
from .codec import *
from .occupancy import *
from .analysis import *
from .tables import *
from .montecarlo import *
from .reporting import *
from .config import *
from .progress import *
