"""Config for pytests."""

from tests.fixtures.configs import *
from tests.fixtures.maps import *
from tests.fixtures.expansions import *
