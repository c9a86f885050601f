"""Write the preset experiments out as JSON configs usable with the CLI.

    python3 demos/make_configs.py
    stampede compare --config demos/configs/injection_control.json \
        --treatment demos/configs/injection_treatment.json --out out/injection
"""
from pathlib import Path

from stampede.config import dump_config
from stampede.presets import (
    densification_pair, fleet_pair, flocking_config, horizon_sweep_config, injection_pair,
    nomadic_config, ridge_network, stampede_config,
)
from stampede.routing import format_network

HERE = Path(__file__).parent / "configs"


def main():
    HERE.mkdir(exist_ok=True)
    inj_c, inj_t = injection_pair()
    den_c, den_t = densification_pair()
    fleet_c, fleet_t = fleet_pair()
    configs = {
        "stampede": stampede_config(),
        "nomadic": nomadic_config(),
        "flocking": flocking_config(),
        "horizon_sweep": horizon_sweep_config(),
        "injection_control": inj_c,
        "injection_treatment": inj_t,
        "densification_control": den_c,
        "densification_treatment": den_t,
        "fleet_homogeneous": fleet_c,
        "fleet_diverse": fleet_t,
    }
    for name, cfg in configs.items():
        (HERE / f"{name}.json").write_text(dump_config(cfg))
    (HERE / "ridge.net").write_text(format_network(ridge_network()))
    print(f"wrote {len(configs)} configs and ridge.net to {HERE}")


if __name__ == "__main__":
    main()
