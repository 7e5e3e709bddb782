"""Read data and configuration from files"""
import os
import re
import copy
import logging
from typing import Mapping, Optional
import yaml
from modules.debug.errors import ConfigurationError

logger = logging.getLogger(__name__)

ENV_PREFIX = "relax_"
SECTIONS = ("grid", "law", "solver", "data", "pme", "sweep", "suites", "norm", "output", "debug")

# (type, section, key); section None means a top-level key
CONFIG_SCHEMA = (
    (int, None, 'seed'),
    (int, None, 'threads'),
    (int, 'grid', 'dim'),
    (int, 'grid', 'points'),
    (float, 'grid', 'period'),
    (float, 'law', 'gamma'),
    (float, 'law', 'rho_bar'),
    (float, 'solver', 'tau'),
    (float, 'solver', 's_end'),
    (float, 'solver', 'cfl'),
    (list, 'solver', 'snapshot_times'),
    (float, 'solver', 'max_step'),
    (bool, 'solver', 'relaxed_cap'),
    (str, 'data', 'kind'),
    (float, 'data', 'amplitude'),
    (int, 'data', 'modes'),
    (str, 'data', 'velocity'),
    (float, 'pme', 's_end'),
    (list, 'pme', 'snapshot_times'),
    (float, 'pme', 'tolerance'),
    (float, 'pme', 'max_step'),
    (bool, 'pme', 'adaptive'),
    (list, 'sweep', 'tau_list'),
    (float, 'sweep', 'sigma'),
    (float, 'sweep', 'r'),
    (float, 'sweep', 'delta'),
    (list, 'sweep', 'comparison_times'),
    (str, 'sweep', 'reference'),
    (int, 'suites', 'family_size'),
    (list, 'suites', 's_list'),
    (float, 'suites', 'r'),
    (int, 'suites', 'directions'),
    (list, 'suites', 'dims'),
    (list, 'suites', 'gammas'),
    (float, 'suites', 'spread_limit'),
    (float, 'norm', 's'),
    (float, 'norm', 'p'),
    (float, 'norm', 'r'),
    (bool, 'norm', 'homogeneous'),
    (str, 'norm', 'field'),
    (str, 'output', 'dir'),
    (bool, 'debug', 'local_log'),
    (str, 'debug', 'log_path'),
)


def get_abs_path(*root_file_path: str) -> str:
    r"""Get the abs path from the root directory of the project to the requested path

    Args:
        root_file_path (\*str): path from the root project directory

    Returns:
        str: corresponding abs path
    """
    root_path = os.path.join(os.path.dirname(__file__), "..", "..")
    return os.path.normpath(os.path.join(root_path, *root_file_path))


def read_file(*root_file_path: str) -> str:
    r"""Read the contents of the file

    Args:
        root_file_path (\*str): path of the file to read from the root project directory

    Returns:
        str: contents of the file
    """
    with open(get_abs_path(*root_file_path), "r", encoding="utf-8") as in_file:
        text = in_file.read().strip()
    return text


def read_md(file_name: str, **replacements: str) -> str:
    """Read the contents of a markdown file.
    The path is data/markdown.
    Every {key} placeholder is replaced with the matching keyword argument

    Args:
        file_name (str): name of the file, without extension

    Returns:
        str: contents of the file
    """
    text = read_file("data", "markdown", file_name + ".md")
    for key, value in replacements.items():
        text = text.replace("{" + key + "}", str(value))
    return text


def deep_merge(base: dict, override: Mapping) -> dict:
    """Merges override into a copy of base, section by section

    Args:
        base (dict): starting configuration
        override (Mapping): values that take precedence

    Returns:
        dict: merged configuration
    """
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_configuration(path: str, load_default: bool = True, force_load: bool = False) -> dict:
    """Loads the configuration from the .yaml file specified in the path and stores it as a dict.
    If load_default is True, it will first look for any file with the same name and the .dist extension.
    Then the values will be overwritten by the specified file, if present.
    If force_load is True, a missing file is a configuration error

    Args:
        path (str): path of the configuration .yaml file
        load_default (bool, optional): whether to look for the .dist file first for the default configuration. Defaults to True.
        force_load (bool, optional): whether to force the presence of the specified file. Defaults to False.

    Returns:
        dict: configuration dictionary
    """
    conf = {}
    if load_default and os.path.exists(f"{path}.dist"):
        conf = deep_merge(conf, _load_yaml(f"{path}.dist"))
    if force_load or os.path.exists(path):
        conf = deep_merge(conf, _load_yaml(path))
    return conf


def _load_yaml(path: str) -> dict:
    try:
        with open(path, 'r', encoding="utf-8") as conf_file:
            content = yaml.load(conf_file, Loader=yaml.SafeLoader)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"file {path} not found") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"file {path} is not valid yaml: {exc}") from exc
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigurationError(f"file {path} must contain a mapping at the top level")
    return content


def read_env(config: dict, environ: Optional[Mapping[str, str]] = None, env_file: Optional[str] = None):
    """Reads the environment variables prefixed with RELAX_ and stores the values in the config dict.
    RELAX_<SECTION>_<KEY> sets config[section][key] for a known section, RELAX_<KEY> a top-level key.
    The .env file in the root directory is read first. Any key already present will be overwritten

    Args:
        config (dict): configuration dictionary
        environ (Mapping[str, str], optional): variables to read. Defaults to os.environ.
        env_file (str, optional): path of the .env file. Defaults to the one in the root directory.
    """
    new_vars = {}
    env_file = env_file or get_abs_path(".env")
    if os.path.exists(env_file):
        envre = re.compile(r'''^([^\s=]+)=(?:[\s"']*)(.+?)(?:[\s"']*)$''')
        with open(env_file, encoding="utf-8") as env:
            for line in env:
                match = envre.match(line)
                if match is not None:
                    new_vars[match.group(1).lower()] = match.group(2)

    environ = os.environ if environ is None else environ
    for key, value in environ.items():
        new_vars[key.lower()] = value

    for key, value in new_vars.items():
        if not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX):]
        section = next((sec for sec in SECTIONS if name.startswith(sec + "_")), None)
        if section is None:
            config[name] = value
        else:
            config.setdefault(section, {})[name[len(section) + 1:]] = value
        logger.debug("environment override %s", key)


def _cast(kind: type, value, where: str):
    if value is None:
        return None
    try:
        if kind is bool:
            if isinstance(value, str):
                if value.strip().lower() in ("true", "yes", "1", "on"):
                    return True
                if value.strip().lower() in ("false", "no", "0", "off"):
                    return False
                raise ValueError(f"'{value}' is not a boolean")
            return bool(value)
        if kind is list:
            if isinstance(value, str):
                value = yaml.load(value, Loader=yaml.SafeLoader)
            if not isinstance(value, (list, tuple)):
                raise ValueError(f"'{value}' is not a list")
            return list(value)
        if kind is float and isinstance(value, str):
            return float(yaml.load(value, Loader=yaml.SafeLoader)) if value.strip().startswith(".") else float(value)
        if kind is int and isinstance(value, float) and not value.is_integer():
            raise ValueError(f"{value} is not an integer")
        return kind(value)
    except (TypeError, ValueError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot read {value!r} as {kind.__name__}: {exc}", where) from exc


def validate_config_types(config: dict):
    """Validates the configuration, casting the values when necessary.
    Missing keys are left alone; sections are created empty if absent

    Args:
        config (dict): configuration dictionary
    """
    for kind, section, key in CONFIG_SCHEMA:
        container = config if section is None else config.setdefault(section, {})
        if not isinstance(container, dict):
            raise ConfigurationError("must be a mapping", section)
        if key in container:
            where = key if section is None else f"{section}.{key}"
            container[key] = _cast(kind, container[key], where)


def validate_config(config: dict):
    """Checks the rules that bind several values together

    Args:
        config (dict): configuration dictionary, already cast

    Raises:
        ConfigurationError: the first rule that is broken, naming the key
    """
    grid = config.get('grid', {})
    points = grid.get('points', 8)
    if points < 8 or points & (points - 1):
        raise ConfigurationError(f"must be a power of two >= 8, got {points}", "grid.points")
    if grid.get('period', 1.0) <= 0:
        raise ConfigurationError("must be positive", "grid.period")
    if config.get('law', {}).get('gamma', 1.0) < 1:
        raise ConfigurationError("must be >= 1", "law.gamma")
    if config.get('law', {}).get('rho_bar', 1.0) <= 0:
        raise ConfigurationError("must be positive", "law.rho_bar")
    solver = config.get('solver', {})
    if not 0 < solver.get('tau', 1.0) <= 1:
        raise ConfigurationError("must lie in (0, 1]", "solver.tau")
    if not 0 < solver.get('cfl', 0.5) < 1:
        raise ConfigurationError("must lie in (0, 1)", "solver.cfl")
    for section in ('solver', 'pme'):
        if config.get(section, {}).get('s_end', 1.0) <= 0:
            raise ConfigurationError("must be positive", f"{section}.s_end")
    sweep = config.get('sweep', {})
    taus = sweep.get('tau_list', [1.0])
    if not taus:
        raise ConfigurationError("must not be empty", "sweep.tau_list")
    if any(not 0 < tau <= 1 for tau in taus) or any(b >= a for a, b in zip(taus, taus[1:])):
        raise ConfigurationError("must be strictly decreasing values in (0, 1]", "sweep.tau_list")
    if not 0 < sweep.get('delta', 0.5) < 1:
        raise ConfigurationError("must lie in (0, 1)", "sweep.delta")
    if sweep.get('reference', 'pme') not in ('pme', 'finest'):
        raise ConfigurationError("must be 'pme' or 'finest'", "sweep.reference")
    if config.get('threads', 1) < 1:
        raise ConfigurationError("must be at least 1", "threads")


def load_run_config(path: Optional[str] = None, environ: Optional[Mapping[str, str]] = None) -> dict:
    """Builds the configuration of a run: shipped defaults, local overrides,
    the run document (if any) and finally the environment

    Args:
        path (str, optional): run document given on the command line. Defaults to None.
        environ (Mapping[str, str], optional): environment to read. Defaults to os.environ.

    Returns:
        dict: validated configuration
    """
    config = load_configuration(get_abs_path("config", "settings.yaml"))
    if path is not None:
        config = deep_merge(config, _load_yaml(path))
    read_env(config, environ)
    validate_config_types(config)
    validate_config(config)
    return config
