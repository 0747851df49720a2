"""resolv: exact workbench for rule-presented infinite Lie and Leibniz algebras."""

__version__ = "0.1.0"
