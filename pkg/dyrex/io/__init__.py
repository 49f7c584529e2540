"""Module containing input/output data structures for dyrex."""

from dyrex.io.interval import DyadicInterval, IntervalCollection
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.space_spec import SpaceSpec, DTYPE
from dyrex.io.expansion import HaarExpansion, StoppingTimeGrid, Atom, SignPattern
from dyrex.io.estimate import NormEstimate, RatioCertificate, CheckReport
from dyrex.io.decomposition import CDecomposition, AdaptedSequence
from dyrex.io.config import Config
