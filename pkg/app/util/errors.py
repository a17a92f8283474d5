class GeohashError(Exception):
    """sfc-geohash 공통 예외"""


class DomainError(GeohashError, ValueError):
    """입력 값이 허용 범위를 벗어남"""


class HashFormatError(GeohashError, ValueError):
    """해시 문자열 형식 오류"""


class UsageError(GeohashError):
    """잘못된 호출 조합"""


class CapacityError(GeohashError):
    """열거 대상이 처리 한도를 초과"""


class HarnessError(GeohashError):
    """벤치마크 측정 조건 불충분"""
