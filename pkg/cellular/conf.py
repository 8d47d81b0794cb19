from django.conf import settings


def setting(name, default):
    """Read an SG_MIMO_* value from Django settings, falling back when unconfigured."""
    if not settings.configured:
        return default
    return getattr(settings, name, default)
