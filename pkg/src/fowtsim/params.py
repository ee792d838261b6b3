"""Physical parameter containers and the parameter-file loader."""

from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .errors import InvalidParameters, MissingFile

RPM = 2.0 * np.pi / 60.0

ROLES = ("main-column", "upper-column", "base-column")


@dataclass(frozen=True)
class BodyProperties:
    """Masses, principal inertias and offsets of the four rigid components.

    Offsets follow the body-frame positions of the component mass centres:
    tower ``(0, 0, H_t)``, nacelle ``(h_nc, 0, H_r)``, rotor ``(-h_r, 0, H_r)``.
    """

    m_p: float
    m_t: float
    m_nc: float
    m_r: float
    I_p: np.ndarray
    I_t: np.ndarray
    I_nc: np.ndarray
    I_r: np.ndarray
    H_t: float
    H_r: float
    h_nc: float
    h_r: float
    g: float = 9.80665

    def validate(self):
        for name in ("m_p", "m_t", "m_nc", "m_r"):
            if not getattr(self, name) > 0:
                raise InvalidParameters(f"{name} must be positive")
        for name in ("I_p", "I_t", "I_nc", "I_r"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3,) or not np.all(arr > 0):
                raise InvalidParameters(f"{name} must hold three positive entries")
        if not self.g > 0:
            raise InvalidParameters("g must be positive")

    @property
    def r_tower(self):
        return np.array([0.0, 0.0, self.H_t])

    @property
    def r_nacelle(self):
        return np.array([self.h_nc, 0.0, self.H_r])

    @property
    def r_rotor(self):
        return np.array([-self.h_r, 0.0, self.H_r])


@dataclass(frozen=True)
class CylinderSpec:
    """One uniform platform cylinder; ``r_b`` is its base centre in the body frame."""

    r_b: np.ndarray
    L_0: float
    d: float
    C_d: float
    C_a: float
    role: str
    C_dz: float = 0.0
    C_az: float = 0.0
    length: Optional[float] = None
    name: str = ""

    @property
    def area(self):
        return np.pi * self.d ** 2 / 4.0

    @property
    def column_length(self):
        return self.L_0 if self.length is None else self.length

    @property
    def submerged(self):
        return self.role == "base-column"

    def validate(self):
        if not (self.d > 0 and self.L_0 > 0):
            raise InvalidParameters(f"cylinder {self.name!r}: d and L_0 must be positive")
        if self.role not in ROLES:
            raise InvalidParameters(f"cylinder {self.name!r}: unknown role {self.role!r}")
        if min(self.C_d, self.C_a, self.C_dz, self.C_az) < 0:
            raise InvalidParameters(f"cylinder {self.name!r}: negative hydrodynamic coefficient")
        if self.column_length < self.L_0:
            raise InvalidParameters(f"cylinder {self.name!r}: length shorter than initial wetted length")


@dataclass(frozen=True)
class MooringLine:
    azimuth: float          # rad
    radius: float
    depth_below_cg: float
    declination: float      # rad, below horizontal
    pretension: float

    @property
    def direction(self):
        """Unit vector from fairlead towards the anchor (inertial, at rest)."""
        c = np.cos(self.declination)
        return np.array([c * np.cos(self.azimuth), c * np.sin(self.azimuth),
                         -np.sin(self.declination)])


@dataclass(frozen=True)
class MooringConfig:
    stiffness: np.ndarray
    damping: np.ndarray
    pretension: np.ndarray
    lines: tuple = ()

    def validate(self):
        K = np.asarray(self.stiffness, dtype=float)
        B = np.asarray(self.damping, dtype=float)
        if K.shape != (6, 6) or B.shape != (6, 6):
            raise InvalidParameters("mooring matrices must be 6x6")
        if not np.allclose(K, K.T, rtol=0, atol=1e-9 * max(1.0, np.abs(K).max())):
            raise InvalidParameters("mooring stiffness must be symmetric")
        if np.linalg.eigvalsh(K).min() < -1e-9 * max(1.0, np.abs(K).max()):
            raise InvalidParameters("mooring stiffness must be positive semidefinite")
        if np.asarray(self.pretension).shape != (6,):
            raise InvalidParameters("mooring pretension must be a 6-vector")
        if self.lines and len(self.lines) != 3:
            raise InvalidParameters("per-line reporting expects exactly three lines")


@dataclass(frozen=True)
class RotorSpec:
    R_r: float
    rho_a: float
    Omega_rated: float
    tau_g_rated: float
    rated_power: float
    Omega_cutin: float = 0.0
    gearbox_ratio: float = 1.0
    torque_law: str = "constant"
    k_opt: float = 0.0              # below-rated gain, rotor side (N m s^2)
    sync_slip: float = 0.1

    def validate(self):
        for name in ("R_r", "rho_a", "Omega_rated", "tau_g_rated", "rated_power"):
            if not getattr(self, name) > 0:
                raise InvalidParameters(f"rotor {name} must be positive")
        if self.torque_law not in ("constant", "schedule"):
            raise InvalidParameters(f"unknown torque law {self.torque_law!r}")
        if self.torque_law == "schedule":
            if not self.k_opt > 0 or not 0 < self.sync_slip < 1:
                raise InvalidParameters("torque schedule needs k_opt > 0 and 0 < sync_slip < 1")
            if not 0 <= 1.3 * self.Omega_cutin < self.Omega_rated:
                raise InvalidParameters("cut-in speed must sit well below rated speed")


@dataclass(frozen=True)
class PlantParams:
    body: BodyProperties
    cylinders: tuple
    mooring: MooringConfig
    rotor: RotorSpec
    rho_w: float = 1025.0
    cg_depth: float = 0.0
    quadrature_points: int = 32
    aero_table_path: Optional[str] = None
    name: str = ""

    @property
    def z_swl(self):
        """Still-water level in the inertial frame (origin at the resting CG)."""
        return self.cg_depth

    def validate(self):
        self.body.validate()
        if len(self.cylinders) != 7:
            raise InvalidParameters("exactly seven cylinders are required")
        for c in self.cylinders:
            c.validate()
        roles = [c.role for c in self.cylinders]
        if roles[4:] != ["base-column"] * 3 or "base-column" in roles[:4]:
            raise InvalidParameters("cylinders 5-7 must be the base columns")
        self.mooring.validate()
        self.rotor.validate()
        if not self.rho_w > 0:
            raise InvalidParameters("water density must be positive")
        if self.quadrature_points < 8:
            raise InvalidParameters("quadrature_points must be >= 8")
        return self

    def with_(self, **kw):
        return replace(self, **kw)


def _arr(x, shape=None):
    a = np.asarray(x, dtype=float)
    if shape is not None and a.shape != shape:
        raise InvalidParameters(f"expected shape {shape}, got {a.shape}")
    return a


def params_from_dict(doc, base_dir=None):
    try:
        g = float(doc.get("gravity", 9.80665))
        water = doc["water"]
        b = doc["body"]
        body = BodyProperties(
            m_p=float(b["platform"]["mass"]), m_t=float(b["tower"]["mass"]),
            m_nc=float(b["nacelle"]["mass"]), m_r=float(b["rotor"]["mass"]),
            I_p=_arr(b["platform"]["inertia"], (3,)), I_t=_arr(b["tower"]["inertia"], (3,)),
            I_nc=_arr(b["nacelle"]["inertia"], (3,)), I_r=_arr(b["rotor"]["inertia"], (3,)),
            H_t=float(b["tower"]["height"]), H_r=float(b["hub_height"]),
            h_nc=float(b["nacelle"]["overhang"]), h_r=float(b["rotor"]["overhang"]), g=g,
        )
        cyls = tuple(
            CylinderSpec(
                r_b=_arr(c["base"], (3,)), L_0=float(c["initial_length"]), d=float(c["diameter"]),
                C_d=float(c.get("Cd", 0.0)), C_a=float(c.get("Ca", 0.0)), role=c["role"],
                C_dz=float(c.get("Cdz", 0.0)), C_az=float(c.get("Caz", 0.0)),
                length=float(c["length"]) if "length" in c else None, name=c.get("name", ""),
            )
            for c in doc["cylinders"]
        )
        m = doc["mooring"]
        lines = tuple(
            MooringLine(azimuth=np.deg2rad(ln["azimuth_deg"]), radius=float(ln["radius"]),
                        depth_below_cg=float(ln["depth_below_cg"]),
                        declination=np.deg2rad(ln["declination_deg"]),
                        pretension=float(ln["pretension"]))
            for ln in m.get("lines", [])
        )
        mooring = MooringConfig(stiffness=_arr(m["stiffness"], (6, 6)),
                                damping=_arr(m.get("damping", np.zeros((6, 6))), (6, 6)),
                                pretension=_arr(m.get("pretension", np.zeros(6)), (6,)),
                                lines=lines)
        r = doc["rotor"]
        rotor = RotorSpec(
            R_r=float(r["radius"]), rho_a=float(doc.get("air_density", 1.225)),
            Omega_rated=float(r["rated_speed_rpm"]) * RPM, tau_g_rated=float(r["rated_torque"]),
            rated_power=float(r["rated_power"]),
            Omega_cutin=float(r.get("cutin_speed_rpm", 0.0)) * RPM,
            gearbox_ratio=float(r.get("gearbox_ratio", 1.0)),
            torque_law=str(r.get("torque_law", "constant")),
            k_opt=float(r.get("k_opt", 0.0)),
            sync_slip=float(r.get("sync_slip", 0.1)),
        )
    except KeyError as exc:
        raise InvalidParameters(f"parameter file is missing {exc}") from None
    table = doc.get("aero_table")
    if table is not None and base_dir is not None:
        table = str((Path(base_dir) / table).resolve())
    params = PlantParams(body=body, cylinders=cyls, mooring=mooring, rotor=rotor,
                         rho_w=float(water["density"]), cg_depth=float(water.get("cg_depth", 0.0)),
                         quadrature_points=int(water.get("quadrature_points", 32)),
                         aero_table_path=table, name=doc.get("name", ""))
    return params.validate()


def load_params(path):
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"parameter file not found: {path}")
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return params_from_dict(doc, base_dir=path.parent)


def reference_params_path():
    return resources.files("fowtsim") / "data" / "nrel5mw_oc4.yaml"


def reference_params():
    """The shipped NREL 5-MW / OC4 semi-submersible parameter set."""
    with resources.as_file(reference_params_path()) as p:
        return load_params(p)
