"""Threat-model template types, adversary models and generic asset types."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, fields, replace


class AdversaryKind(str, enum.Enum):
    UNPRIVILEGED_SOFTWARE = "UnprivilegedSoftware"
    SYSTEM_SOFTWARE = "SystemSoftware"
    STARTUP_CODE_SMM = "StartupCodeSMM"
    NETWORK = "Network"
    SOFTWARE_SIDE_CHANNEL = "SoftwareSideChannel"
    SIMPLE_HARDWARE = "SimpleHardware"
    SKILLED_HARDWARE = "SkilledHardware"
    INSIDER_THREAT = "InsiderThreat"


@dataclass(frozen=True)
class AdversaryModel:
    kind: AdversaryKind
    capabilities: str

    def __post_init__(self):
        if not isinstance(self.kind, AdversaryKind):
            object.__setattr__(self, "kind", AdversaryKind(self.kind))
        if not self.capabilities.strip():
            raise ValueError("adversary capabilities must be non-empty")


ADVERSARY_MODELS: dict[AdversaryKind, AdversaryModel] = {
    m.kind: m
    for m in (
        AdversaryModel(AdversaryKind.UNPRIVILEGED_SOFTWARE, "Limited capability to run user-code"),
        AdversaryModel(AdversaryKind.SYSTEM_SOFTWARE, "Admin/root access to system software"),
        AdversaryModel(AdversaryKind.STARTUP_CODE_SMM,
                       "Can tamper the boot or system management mode code"),
        AdversaryModel(AdversaryKind.NETWORK, "Can communicate with confidential services"),
        AdversaryModel(AdversaryKind.SOFTWARE_SIDE_CHANNEL,
                       "Can monitor/extract confidential metadata"),
        AdversaryModel(AdversaryKind.SIMPLE_HARDWARE,
                       "Physical access without expensive equipment or training"),
        AdversaryModel(AdversaryKind.SKILLED_HARDWARE,
                       "Physical access with skilled training and failure-analysis tools"),
        AdversaryModel(AdversaryKind.INSIDER_THREAT, "Anyone within the trusted supply chain"),
    )
}

# the five elements every threat model must define
TEMPLATE_FIELDS = ("adversaries", "assets", "attack_surfaces", "vulnerabilities", "threats")

CVE_PATTERN = re.compile(r"^CVE-\d{4}-\d{4,}$")


@dataclass(frozen=True)
class ThreatModelRecord:
    cwe_id: int
    title: str
    adversaries: tuple[str, ...]
    assets: str
    attack_surfaces: str
    vulnerabilities: str
    threats: str
    related_cves: tuple[str, ...] = ()
    related_capecs: tuple[int, ...] = ()
    keywords: tuple[str, ...] = ()
    reviewed: bool = False
    review_notes: str = ""

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def with_changes(self, **changes) -> "ThreatModelRecord":
        return replace(self, **changes)


@dataclass(frozen=True)
class Violation:
    field: str
    reason: str


@dataclass(frozen=True)
class Tmdb:
    """Threat model database. Treat ``records`` as read-only."""

    records: dict[int, ThreatModelRecord] = field(default_factory=dict)
    version: str = "0"

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records[k] for k in sorted(self.records))

    def get(self, cwe_id: int) -> ThreatModelRecord | None:
        return self.records.get(cwe_id)


class AssetType(str, enum.Enum):
    SENSITIVE_DATA = "SensitiveData"
    BOOT_INTEGRITY = "BootIntegrity"
    ATTESTATION_MEASUREMENT = "AttestationMeasurement"
    PARAMETRIC_DATA = "ParametricData"
    PRIVILEGED_SYSTEM_RESOURCES = "PrivilegedSystemResources"
    SHARED_RESOURCES = "SharedResources"
    RUNTIME_INTEGRITY_STATE = "RuntimeIntegrityState"


@dataclass(frozen=True)
class AssetDefinition:
    asset_type: AssetType
    definition: tuple[str, ...]
    patterns: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "asset_type": self.asset_type.value,
            "definition": list(self.definition),
            "patterns": list(self.patterns),
        }


@dataclass(frozen=True)
class KeywordIndex:
    entries: dict[str, frozenset[int]]
    source: str

    def lookup(self, keyword: str) -> frozenset[int]:
        return self.entries.get(keyword.strip().lower(), frozenset())

    def __contains__(self, keyword: str) -> bool:
        return keyword.strip().lower() in self.entries

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "entries": {k: sorted(v) for k, v in sorted(self.entries.items())},
        }
