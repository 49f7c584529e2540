"""Top-level package for dyrex."""

from dyrex.version import __version__

from dyrex.io.interval import DyadicInterval, IntervalCollection
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.space_spec import SpaceSpec
from dyrex.io.expansion import HaarExpansion, Atom, SignPattern
from dyrex.io.estimate import NormEstimate, RatioCertificate, CheckReport
from dyrex.io.decomposition import CDecomposition, AdaptedSequence
from dyrex.io.config import Config

from dyrex.rearrangement import semenov_exact, semenov_heuristic, carleson_distortion
from dyrex.operators import operator_norm_search, umd_constant, type_constant
