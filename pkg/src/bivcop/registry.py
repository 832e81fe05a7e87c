"""
Family registry
Handles registering and looking up copula families by name.
"""

import logging
from typing import Optional

from ..exceptions import DomainError
from .base import FamilyManager, CopulaFamily
from .families import (
    IndependenceFamily,
    ClaytonFamily,
    FrankFamily,
    GumbelFamily,
    GaussianFamily
)

logger = logging.getLogger("SVCT.BivCop.Registry")

# Singleton family manager instance
_family_manager = None

def get_family_manager() -> FamilyManager:
    """Get the family manager instance

    Returns:
        FamilyManager: Family manager singleton
    """
    global _family_manager

    if _family_manager is None:
        _family_manager = FamilyManager()
        register_default_families(_family_manager)

    return _family_manager

def register_default_families(manager: FamilyManager) -> None:
    """Register the built-in families

    Args:
        manager: Family manager instance
    """
    manager.register_family(IndependenceFamily())
    manager.register_family(ClaytonFamily())
    manager.register_family(FrankFamily())
    manager.register_family(GumbelFamily())
    manager.register_family(GaussianFamily())

    logger.debug("Registered default copula families")

def find_family(name: str) -> Optional[CopulaFamily]:
    """Get a family by name, or None"""
    return get_family_manager().get_family(name)

def get_family(name: str) -> CopulaFamily:
    """Get a family by name

    Raises:
        DomainError: If no family of that name is registered
    """
    family = find_family(name)
    if family is None:
        raise DomainError(f"unknown copula family '{name}' "
                          f"(known: {', '.join(get_family_manager().names())})",
                          parameter="family", value=name)
    return family
