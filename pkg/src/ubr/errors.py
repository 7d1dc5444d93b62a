"""Exception types shared across the package."""


class UBRError(Exception):
    """Base class for all package errors."""


class ParameterError(UBRError, ValueError):
    """A parameter violates a precondition (Nyquist, ranges, sample rates)."""


class DegenerateParameterError(ParameterError):
    """Random draws kept landing on a singular configuration."""


class BandError(UBRError, ValueError):
    """Too few usable spectral points inside the requested fit band."""


class ConfigError(UBRError, ValueError):
    """An experiment configuration failed to parse or validate.

    ``field`` names the offending ``section.key`` when known and ``line``
    the 1-based line number for syntax errors.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class WavError(UBRError):
    """Base class for WAV ingestion failures."""


class MalformedWavError(WavError, ValueError):
    """The RIFF/WAVE structure is broken or truncated."""


class UnsupportedCodecError(WavError, ValueError):
    """The file is a valid WAVE container but not uncompressed PCM/float."""


class ChannelRangeError(WavError, IndexError):
    """The requested channel does not exist in the file."""
