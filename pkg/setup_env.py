#!/usr/bin/env python3
"""Environment verification for Seminorm Lab.

Checks the interpreter version, the required packages and the published
JSON schemas, then runs one smoke derivation and one smoke witness check
through the library.
"""

import json
import sys
import warnings
from pathlib import Path

warnings.filterwarnings("ignore", category=DeprecationWarning)

SCHEMA_FILES = ("report-schema.json", "presentation-schema.json")


def check_python_version():
    """Verify Python version compatibility."""
    if sys.version_info < (3, 11):
        print("❌ Python 3.11 or higher is required")
        sys.exit(1)
    print(f"✅ Python version: {sys.version.split()[0]}")


def check_required_packages():
    """Check if required packages are installed."""
    required_packages = [
        'numpy',
        'scipy',
        'sympy',
        'pydantic',
        'dotenv',
        'jsonschema',
    ]

    missing_packages = []

    for package in required_packages:
        try:
            __import__(package)
            print(f"✅ Package '{package}' is available")
        except ImportError:
            missing_packages.append(package)
            print(f"❌ Package '{package}' is missing")

    if missing_packages:
        print(f"\n❌ Missing packages: {', '.join(missing_packages)}")
        print("Install missing packages with: pip install -r requirements.txt")
        sys.exit(1)


def check_schemas():
    """Every published schema must exist and be a valid draft 2020-12 schema."""
    from jsonschema import Draft202012Validator
    from jsonschema.exceptions import SchemaError

    schema_dir = Path(__file__).resolve().parent / "schema"
    ok = True
    for name in SCHEMA_FILES:
        path = schema_dir / name
        try:
            Draft202012Validator.check_schema(json.loads(path.read_text(encoding="utf-8")))
            print(f"✅ Schema '{name}' is valid")
        except (OSError, ValueError, SchemaError) as exc:
            print(f"❌ Schema '{name}' is unusable: {exc}")
            ok = False
    return ok


def smoke_derivation():
    """Finitely supported sequences must get a replayable cnp derivation."""
    try:
        from np_engine import Status, cnp, derive, render_text, replay
        from seminorms import FinSupp

        print("\n🔄 Deriving the cnp of R^(N)...")
        verdict = derive(FinSupp(), cnp())
        if verdict.status is not Status.HOLDS or not replay(verdict.derivation):
            print(f"❌ Unexpected verdict: {verdict.status.value}")
            return False
        print(render_text(verdict.derivation, indent=1))
        print("✅ Derivation replays")
        return True
    except Exception as exc:
        print(f"❌ Smoke derivation failed: {exc}")
        return False


def smoke_witness():
    """A small target-side witness must survive a seeded numerical check."""
    try:
        from falsify import SampleConfig, check
        from models import finsupp_pointwise
        from seminorms import PrefixSup
        from witness import target_cnp_product_estimates

        print("\n🔄 Checking a 3x3 target-side witness on R^4...")
        norm = PrefixSup(n=4)
        targets = [[norm] * 3 for _ in range(3)]
        witness = target_cnp_product_estimates(norm, [[1.0] * 3] * 3, norm, norm, targets=targets)
        outcome = check(finsupp_pointwise(4), None, witness, SampleConfig(seed=0, count=500))
        print(f"✅ {outcome.outcome} after {outcome.samples_tried} samples")
        return outcome.outcome == "Pass"
    except Exception as exc:
        print(f"❌ Smoke witness check failed: {exc}")
        return False


def main():
    """Main setup verification function."""
    print("🚀 Seminorm Lab - Environment Setup Verification")
    print("=" * 60)

    check_python_version()

    print("\n📦 Checking required packages...")
    check_required_packages()

    print("\n📐 Checking report schemas...")
    schemas_ok = check_schemas()

    derivation_ok = smoke_derivation()
    witness_ok = smoke_witness()

    print("\n" + "=" * 60)
    print("📋 Setup Verification Summary:")
    print("   Python Version: ✅")
    print("   Required Packages: ✅")
    print(f"   Schemas: {'✅' if schemas_ok else '❌'}")
    print(f"   Smoke Derivation: {'✅' if derivation_ok else '❌'}")
    print(f"   Smoke Witness: {'✅' if witness_ok else '❌'}")

    if schemas_ok and derivation_ok and witness_ok:
        print("\n🎉 Environment setup verification completed successfully!")
        print("\nTry the command line with:")
        print("   python main.py repro sequence-product --n 3")
    else:
        print("\n❌ Environment setup verification failed!")
        print("Please check the error messages above and fix any issues.")
        sys.exit(1)


if __name__ == "__main__":
    main()
