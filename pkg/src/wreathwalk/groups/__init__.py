from .delta import DeltaElement, DiagonalProduct
from .finite import (DInfinity, FiniteGroupTable, IntegerGroup, cyclic_group, dihedral_group,
                     symmetric_group, table_from_permutations)
from .line import IntegerLine
from .metric import Unreached, word_length_bfs, word_length_lamplighter_line
from .symz import SymZ, SymZElement
from .wreath import WreathElement, WreathProduct, lamplighter
