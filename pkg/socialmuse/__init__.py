"""SocialMuse: peer recommendations that nudge who an ideator follows for inspiration."""

__version__ = "0.1.0"
