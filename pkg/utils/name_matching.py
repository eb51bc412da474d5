from typing import Iterable, Optional

from errors import UnknownNameError


def _normalize(name: str) -> str:
    return name.lower().strip().replace('_', '-')


def closest_name(name: str, choices: Iterable[str],
                 similarity_threshold: float = 0.6) -> Optional[str]:
    """
    Suggest the valid name closest to a mistyped one.

    Uses fuzzy matching when rapidfuzz is available and falls back to
    prefix/substring comparison otherwise.

    Args:
        name: The name as typed
        choices: Valid names
        similarity_threshold: Minimum similarity (0-1) for a suggestion

    Returns:
        The best valid name, or None when nothing is close enough
    """
    choices = list(choices)
    typed = _normalize(name)
    if not typed or not choices:
        return None

    try:
        from rapidfuzz import fuzz, process

        match = process.extractOne(typed, choices, scorer=fuzz.ratio,
                                   processor=_normalize)
        if match and match[1] / 100.0 >= similarity_threshold:
            return match[0]
        return None

    except ImportError:
        for choice in choices:
            candidate = _normalize(choice)
            if candidate.startswith(typed) or typed.startswith(candidate):
                return choice
        for choice in choices:
            candidate = _normalize(choice)
            if typed in candidate or candidate in typed:
                return choice
        return None


def resolve_name(kind: str, name: str, choices: Iterable[str]) -> str:
    """Return the canonical spelling of name, or raise UnknownNameError with a suggestion"""
    choices = list(choices)
    typed = _normalize(str(name))
    for choice in choices:
        if _normalize(choice) == typed:
            return choice
    raise UnknownNameError(kind, str(name), closest_name(str(name), choices))
