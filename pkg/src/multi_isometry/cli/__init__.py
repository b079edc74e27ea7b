from multi_isometry.cli.instance import Instance, dump_instance, dumps, parse_instance

__all__ = ["Instance", "dump_instance", "dumps", "parse_instance"]
