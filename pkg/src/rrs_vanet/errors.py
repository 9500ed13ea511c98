"""Exception hierarchy shared by every layer of the package."""


class RrsError(Exception):
    """Base class for all errors raised by rrs_vanet."""


# -- group / encoding ---------------------------------------------------------


class InvalidElement(RrsError, ValueError):
    """A value is not a valid element of the group it claims to belong to."""


class WrongLength(InvalidElement):
    pass


class NonCanonicalEncoding(InvalidElement):
    pass


class NotInSubgroup(InvalidElement):
    pass


# -- ring signature scheme -----------------------------------------------------


class RingError(RrsError, ValueError):
    pass


class EmptyRing(RingError):
    pass


class DuplicateRingMember(RingError):
    pass


class SignerNotInRing(RingError):
    pass


class IndexMismatch(RingError):
    pass


class LengthMismatch(RingError):
    pass


class EmptyIdentity(RrsError, ValueError):
    pass


class InvalidSignature(RrsError):
    pass


class NoSignerFound(RrsError):
    pass


# -- authority -----------------------------------------------------------------


class DuplicateIdentity(RrsError):
    pass


class UnregisteredKey(RrsError):
    pass


class AlreadyRevoked(RrsError):
    pass


# -- vehicle -------------------------------------------------------------------


class InsufficientKeys(RrsError):
    pass


class InvalidPayload(RrsError, ValueError):
    pass


# -- simulation / analysis -----------------------------------------------------


class InvalidConfig(RrsError, ValueError):
    pass


class UnknownProtocol(RrsError, ValueError):
    pass
