import logging
import math
from dataclasses import dataclass

import numpy as np

from service.curve_service import CurveService
from util.curves import CurveId, CurveIndex, GridPoint, Mode, check_granularity, check_point
from util.errors import DomainError, HashFormatError

# 로거 설정
logger = logging.getLogger(__name__)

BASE32 = '0123456789bcdefghjkmnpqrstuvwxyz'
CHARMAP = {c: i for i, c in enumerate(BASE32)}


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not math.isfinite(self.lat):
            raise DomainError(f"latitude is not finite: {self.lat}")
        if not math.isfinite(self.lon):
            raise DomainError(f"longitude is not finite: {self.lon}")
        if not -90.0 <= self.lat <= 90.0:
            raise DomainError(f"latitude out of range [-90, 90]: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise DomainError(f"longitude out of range [-180, 180]: {self.lon}")

    @classmethod
    def from_degrees(cls, lat: float, lon: float) -> 'GeoPoint':
        """32비트 float 정밀도로 반올림한 좌표"""
        lat, lon = float(lat), float(lon)
        if math.isfinite(lat) and math.isfinite(lon):
            lat, lon = float(np.float32(lat)), float(np.float32(lon))
        return cls(lat, lon)


@dataclass(frozen=True)
class Geohash:
    text: str
    curve: CurveId
    n: int


def hash_length(n: int) -> int:
    """해시 길이 = ceil(2n / 5)"""
    return -(-2 * check_granularity(n) // 5)


def index_to_text(value: int, n: int) -> str:
    """5비트 그룹, 상위 비트부터"""
    length = hash_length(n)
    chars = []
    for shift in range(5 * (length - 1), -1, -5):
        chars.append(BASE32[(value >> shift) & 0x1F])
    return ''.join(chars)


def text_to_index(text: str, n: int) -> int:
    length = hash_length(n)
    if len(text) != length:
        raise HashFormatError(f"wrong hash length for n={n}: expected {length}, got {len(text)}")
    value = 0
    for position, c in enumerate(text):
        digit = CHARMAP.get(c)
        if digit is None:
            raise HashFormatError(f"invalid character {c!r} at position {position}")
        value = (value << 5) | digit
    if value >> (2 * n):
        raise HashFormatError(f"hash {text!r} decodes to index {value}, beyond 4^{n} cells")
    return value


def point_to_cell(g: GeoPoint, n: int) -> GridPoint:
    """좌표를 격자 칸으로 양자화 (경도 -> x, 위도 -> y)"""
    side = 1 << check_granularity(n)
    x = min(math.floor((g.lon + 180.0) / 360.0 * side), side - 1)
    y = min(math.floor((g.lat + 90.0) / 180.0 * side), side - 1)
    return GridPoint(x, y)


def cell_to_point(p: GridPoint, n: int) -> GeoPoint:
    """칸 중심 좌표"""
    check_point(p, n)
    side = 1 << n
    return GeoPoint(
        lat=(p.y + 0.5) / side * 180.0 - 90.0,
        lon=(p.x + 0.5) / side * 360.0 - 180.0,
    )


def cell_bounds(p: GridPoint, n: int):
    """(south, west, north, east)"""
    check_point(p, n)
    side = 1 << n
    return (
        p.y / side * 180.0 - 90.0,
        p.x / side * 360.0 - 180.0,
        (p.y + 1) / side * 180.0 - 90.0,
        (p.x + 1) / side * 360.0 - 180.0,
    )


class GeocodeService:
    def __init__(self, curve_service: CurveService):
        self.curve_service = curve_service

    def encode_hash(self, g: GeoPoint, curve: CurveId, n: int, mode: Mode = Mode.PLAIN) -> Geohash:
        """좌표 -> 곡선 geohash"""
        cell = point_to_cell(g, n)
        index = self.curve_service.index(curve, cell, n, mode)
        return Geohash(index_to_text(index.value, n), CurveId(curve), n)

    def decode_cell(self, h: Geohash) -> GridPoint:
        """geohash -> 격자 칸"""
        value = text_to_index(h.text, h.n)
        return self.curve_service.point(h.curve, CurveIndex(value, h.n))

    def decode_hash(self, h: Geohash) -> GeoPoint:
        """geohash -> 칸 중심 좌표"""
        return cell_to_point(self.decode_cell(h), h.n)
