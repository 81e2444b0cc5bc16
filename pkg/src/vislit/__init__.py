"""BubbleView attention capture and visualization-literacy analysis toolkit."""

__version__ = "0.1.0"
