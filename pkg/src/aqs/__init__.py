"""Almost contact metric structures: classification, curvature and connections."""

__version__ = "0.1.0"
