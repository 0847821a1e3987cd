# models/__init__.py
from models.boundary import BoundaryCondition, BoundaryKind, SpinConfig, exhaustive_family
from models.cycles import (CornerSign, CycleBasis, Decomposition, ParitySet, PlaquetteUniverse,
                           Provenance, ScreenKind, ShadowScreen)
from models.errors import PlaquetteError
from models.lattice import ModelKind, ModelSpec, PlaquetteId, PlaquetteMode, Region, Site
from models.results import (Exactness, LengthEstimate, LengthKind, MagnetizationResult,
                            QuantityRecord, SupResult)
from models.specs import ChainSpec, Dynamics, GibbsSpec, RenormSpec, ScanOrder


__all__ = [
            'BoundaryCondition',
            'BoundaryKind',
            'ChainSpec',
            'CornerSign',
            'CycleBasis',
            'Decomposition',
            'Dynamics',
            'Exactness',
            'GibbsSpec',
            'LengthEstimate',
            'LengthKind',
            'MagnetizationResult',
            'ModelKind',
            'ModelSpec',
            'ParitySet',
            'PlaquetteError',
            'PlaquetteId',
            'PlaquetteMode',
            'PlaquetteUniverse',
            'Provenance',
            'QuantityRecord',
            'Region',
            'RenormSpec',
            'ScanOrder',
            'ScreenKind',
            'ShadowScreen',
            'Site',
            'SpinConfig',
            'SupResult',
            'exhaustive_family'
            ]
