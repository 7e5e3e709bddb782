"""Modules that work with the data section"""
from .data_reader import load_run_config, read_md
from .report import Report, ReportWriter, atomic_write
from .field_io import read_field, write_field
