from .errors import *
from .tools import *
from .math_kernels import *
from .channel import *
from .fbl_rate import *
from .effective_capacity import *
from .eee_models import *
from .oracles import *
from .arq_ebp import *
from .optimizers import *
from .config import *
from .scenarios import *
from .validation import *
