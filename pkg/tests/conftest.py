import pytest

from permcheck.kernel import EMPTY
from permcheck.model import (
    DANGEROUS,
    Environment,
    Manifest,
    Perm,
    State,
    System,
)

READ = Perm("read", "contacts", DANGEROUS)
WRITE = Perm("write", "contacts", DANGEROUS)
NET = Perm("net", None, "normal")  # ungrouped


def make_system(apps=(), mg=EMPTY, perms=EMPTY, manifest=EMPTY, cert=EMPTY,
                def_perms=EMPTY, system_image=EMPTY, verified=()):
    return System(
        State(apps=frozenset(apps), alreadyVerified=frozenset(verified),
              grantedPermGroups=mg, perms=perms),
        Environment(manifest=manifest, cert=cert, defPerms=def_perms,
                    systemImage=system_image),
    )


@pytest.fixture
def f1():
    """App a1 installed, manifest requests READ, contacts group authorized,
    READ is a system permission, nothing granted yet."""
    sys = make_system(
        apps=("a1",),
        mg=frozenset((("a1", frozenset(("contacts",))),)),
        manifest=frozenset((("a1", Manifest(frozenset((READ,)))),)),
    )
    return {"sp": frozenset((READ,)), "sys": sys, "p": READ, "app": "a1"}
