from ._wgflow import *  # noqa: F401,F403
