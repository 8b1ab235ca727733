from config.exceptions import ConfigurationError


class BadLayout(ConfigurationError):
    """A latent partition does not fit the variant or the channel count."""
