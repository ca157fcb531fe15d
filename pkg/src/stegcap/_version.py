"""Single source for the package version string."""

__version__ = "0.1.0"

#: Identifier embedded in experiment reports so a result can be traced back
#: to the exact build that produced it.
TOOL_ID = f"stegcap {__version__}"
