"""RIFF/WAVE reading and writing, clip extraction, and CSV/metadata export."""

from __future__ import annotations

import json
import os
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ChannelRangeError, MalformedWavError, ParameterError, UnsupportedCodecError
from .series import TimeSeries

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE
# Trailing 14 bytes of the KSDATAFORMAT_SUBTYPE GUID shared by PCM and float.
_GUID_TAIL = b"\x00\x00\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"

CSV_HEADER = "frequency_hz,power"


@dataclass(frozen=True)
class WavDescriptor:
    sample_rate: int
    channel_count: int
    bits_per_sample: int
    sample_format: str  # "int" or "float"
    frame_count: int
    block_align: int
    data_offset: int


def _chunks(buf: bytes):
    """Yield ``(chunk_id, offset_of_payload, size)`` for the RIFF body."""
    pos = 12
    end = len(buf)
    while pos + 8 <= end:
        cid, size = struct.unpack_from("<4sI", buf, pos)
        payload = pos + 8
        if payload + size > end:
            raise MalformedWavError(f"chunk {cid!r} declares {size} bytes but only {end - payload} remain")
        yield cid, payload, size
        pos = payload + size + (size & 1)


def _parse_fmt(buf: bytes, off: int, size: int):
    if size < 16:
        raise MalformedWavError(f"fmt chunk too short ({size} bytes)")
    tag, channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", buf, off)
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if size < 40:
            raise MalformedWavError("extensible fmt chunk shorter than 40 bytes")
        valid_bits = struct.unpack_from("<H", buf, off + 18)[0]
        guid = buf[off + 24 : off + 40]
        if guid[2:] != _GUID_TAIL:
            raise UnsupportedCodecError("extensible WAV with a non-PCM/float subformat")
        tag = struct.unpack_from("<H", guid, 0)[0]
        bits = bits or valid_bits
    if tag == WAVE_FORMAT_PCM:
        fmt = "int"
        if bits not in (8, 16, 24, 32):
            raise UnsupportedCodecError(f"{bits}-bit integer PCM is not supported")
    elif tag == WAVE_FORMAT_IEEE_FLOAT:
        fmt = "float"
        if bits not in (32, 64):
            raise UnsupportedCodecError(f"{bits}-bit float data is not supported")
    else:
        raise UnsupportedCodecError(f"format tag {tag:#06x} is compressed or unknown")
    if channels < 1 or rate < 1:
        raise MalformedWavError(f"invalid channel count {channels} or sample rate {rate}")
    if block_align != channels * bits // 8:
        raise MalformedWavError(f"block_align {block_align} does not match {channels} x {bits}-bit samples")
    return fmt, channels, rate, bits, block_align


def describe_wav(path) -> WavDescriptor:
    return _parse(Path(path).read_bytes())[0]


def _parse(buf: bytes):
    if len(buf) < 12 or buf[:4] not in (b"RIFF", b"RIFX") or buf[8:12] != b"WAVE":
        raise MalformedWavError("not a RIFF/WAVE file")
    if buf[:4] == b"RIFX":
        raise UnsupportedCodecError("big-endian RIFX files are not supported")
    riff_size = struct.unpack_from("<I", buf, 4)[0]
    if riff_size + 8 > len(buf):
        raise MalformedWavError(f"RIFF size {riff_size} exceeds file length {len(buf)}")
    fmt = None
    data = None
    for cid, off, size in _chunks(buf[: riff_size + 8]):
        if cid == b"fmt ":
            fmt = _parse_fmt(buf, off, size)
        elif cid == b"data":
            data = (off, size)
            if fmt is not None:
                break
    if fmt is None:
        raise MalformedWavError("missing fmt chunk")
    if data is None:
        raise MalformedWavError("missing data chunk")
    sample_format, channels, rate, bits, block_align = fmt
    off, size = data
    if size % block_align:
        raise MalformedWavError(f"data chunk of {size} bytes is not a whole number of {block_align}-byte frames")
    desc = WavDescriptor(rate, channels, bits, sample_format, size // block_align, block_align, off)
    return desc, buf


def _decode(buf: bytes, desc: WavDescriptor) -> np.ndarray:
    """Return a ``(frames, channels)`` float64 array scaled to [-1, 1]."""
    count = desc.frame_count * desc.channel_count
    raw = np.frombuffer(buf, dtype=np.uint8, count=desc.frame_count * desc.block_align, offset=desc.data_offset)
    bits = desc.bits_per_sample
    if desc.sample_format == "float":
        x = raw.view("<f4" if bits == 32 else "<f8").astype(np.float64)
    elif bits == 8:
        x = (raw.astype(np.float64) - 128.0) / 128.0
    elif bits == 24:
        b = raw.reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v & 0x800000, v - (1 << 24), v)
        x = v.astype(np.float64) / float(1 << 23)
    else:
        x = raw.view("<i2" if bits == 16 else "<i4").astype(np.float64) / float(1 << (bits - 1))
    return x[:count].reshape(desc.frame_count, desc.channel_count)


def read_wav(path, channel: int = 0) -> TimeSeries:
    """Read one channel of an uncompressed WAV file.

    Integer samples are divided by ``2**(bits-1)`` (so 16-bit 32767 becomes
    0.99997); float samples are taken as stored.

    Raises
    ------
    MalformedWavError
        Broken RIFF structure or chunk sizes beyond the end of the file.
    UnsupportedCodecError
        Compressed or otherwise unsupported sample formats.
    ChannelRangeError
        ``channel`` is not below the channel count.
    """
    desc, buf = _parse(Path(path).read_bytes())
    if not 0 <= channel < desc.channel_count:
        raise ChannelRangeError(f"channel {channel} requested from a {desc.channel_count}-channel file")
    if desc.frame_count < 1:
        raise MalformedWavError("data chunk holds no frames")
    frames = _decode(buf, desc)
    return TimeSeries(np.ascontiguousarray(frames[:, channel]), float(desc.sample_rate))


def peak_scale(signal: TimeSeries, peak: float = 0.9) -> float:
    """Factor that brings the signal peak to ``peak`` (1.0 for silence)."""
    p = signal.peak()
    return peak / p if p > 0 else 1.0


def write_wav(signal, path, bits: int = 16, sample_format: str = "int") -> None:
    """Write a PCM or float WAV file.

    ``signal`` is a :class:`TimeSeries` or a list of equal-length
    TimeSeries, one per channel. Samples must already lie in [-1, 1];
    see :func:`peak_scale`. Integers are rounded to the nearest code and
    clipped to the positive full scale ``2**(bits-1) - 1``.
    """
    channels = list(signal) if isinstance(signal, (list, tuple)) else [signal]
    rate = channels[0].sample_rate
    n = len(channels[0])
    if any(len(c) != n or c.sample_rate != rate for c in channels):
        raise ParameterError("channels must share length and sample rate")
    if int(rate) != rate:
        raise ParameterError(f"WAV needs an integer sample rate, got {rate}")
    data = np.stack([c.samples for c in channels], axis=1)
    if np.max(np.abs(data), initial=0.0) > 1.0:
        raise ParameterError("samples exceed full scale; rescale before writing")
    if sample_format == "float":
        if bits not in (32, 64):
            raise ParameterError("float WAV supports 32 or 64 bits")
        payload = data.astype("<f4" if bits == 32 else "<f8").tobytes()
        tag = WAVE_FORMAT_IEEE_FLOAT
    elif sample_format == "int":
        if bits not in (16, 24, 32):
            raise ParameterError("integer WAV supports 16, 24 or 32 bits")
        full = float(1 << (bits - 1))
        q = np.clip(np.rint(data * full), -full, full - 1).astype(np.int64)
        if bits == 24:
            u = (q & 0xFFFFFF).astype(np.uint32).reshape(-1)
            payload = np.stack([u & 0xFF, (u >> 8) & 0xFF, (u >> 16) & 0xFF], axis=1).astype(np.uint8).tobytes()
        else:
            payload = q.astype("<i2" if bits == 16 else "<i4").tobytes()
        tag = WAVE_FORMAT_PCM
    else:
        raise ParameterError(f"unknown sample_format {sample_format!r}")
    nch = len(channels)
    block_align = nch * bits // 8
    fmt = struct.pack("<HHIIHH", tag, nch, int(rate), int(rate) * block_align, block_align, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        body += b"\x00"
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)


def clip(signal: TimeSeries, start: float, duration: float) -> TimeSeries:
    """Sub-series starting at ``start`` seconds, both ends rounded to the
    nearest sample."""
    if start < 0 or duration <= 0:
        raise ParameterError(f"invalid clip start={start} duration={duration}")
    rate = signal.sample_rate
    i0 = int(round(start * rate))
    n = int(round(duration * rate))
    if i0 + n > len(signal):
        raise ParameterError(
            f"clip [{start}, {start + duration}] s exceeds the {signal.duration:.6g} s signal"
        )
    return TimeSeries(signal.samples[i0 : i0 + n], rate)


def write_spectrum_csv(path, frequencies, power) -> None:
    """``frequency_hz,power`` rows in shortest round-trip decimal form, so
    reading the file back gives the float64 values exactly."""
    f = np.asarray(frequencies, dtype=float).tolist()
    p = np.asarray(power, dtype=float).tolist()
    body = "\n".join(f"{a!r},{b!r}" for a, b in zip(f, p))
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        if body:
            fh.write(body + "\n")


def read_spectrum_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def write_json(path, record: dict) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    os.replace(tmp, path)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
