"""Modules that provide various util"""
from .info_util import RunInfo
