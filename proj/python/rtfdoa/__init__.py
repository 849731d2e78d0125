# python/rtfdoa/__init__.py
#
# Copyright 2026 rtfdoa authors
#
# Licensed under the Apache License, Version 2.0;
# see http://www.apache.org/licenses/LICENSE-2.0

"""Two-microphone RTF-phase DOA estimation."""

from rtfdoa._core import *  # noqa: F401,F403
