"""Online clustering of tweet streams into memes via protomemes."""

__version__ = "0.1.0"
