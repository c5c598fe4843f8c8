import gc
import sys
import argparse
import subprocess

from warnings import simplefilter
simplefilter("ignore")

PIPELINE_STEPS = {
    0: {
        "name": "Verify Theory",
        "module": "pipeline.verify_theory",
        "description": "Check both distillation theorems on 1000 random Gaussian teacher ensembles",
    },
    1: {
        "name": "Partition Dataset",
        "module": "pipeline.partition_dataset",
        "description": "Split the desk GMM task into three non-IID regions and a server pool",
    },
    2: {
        "name": "Distill Global Student",
        "module": "pipeline.distill_global",
        "description": "Compare the distilled student against its regional teachers",
    },
    3: {
        "name": "Run Federation",
        "module": "pipeline.run_federation",
        "description": "Run the full hierarchical schedule with the adaptive LKD/FedAvg switch",
    },
    4: {
        "name": "Generate Report",
        "module": "pipeline.generate_report",
        "description": "Plot the accuracy curve and export per-class accuracy of the run",
    },
    5: {
        "name": "Lambda3 Sweep",
        "module": "pipeline.sweep_distillation",
        "description": "Sweep the hard-loss coefficient over five seeds",
    },
    6: {
        "name": "Server Size Sweep",
        "module": "pipeline.sweep_distillation",
        "description": "Shrink the server pool and repeat distillation over five seeds",
    },
    7: {
        "name": "Injection Sweep",
        "module": "pipeline.sweep_distillation",
        "description": "Compare the post-injection accuracy dip of F2L and pure FedAvg",
    },
}

DESK_CONFIG = "data/configs/desk_gmm.json"
INJECTION_CONFIG = "data/configs/desk_injection.json"

def run_step(step_num, args):
    """Run a single pipeline step as a Python module"""
    step = PIPELINE_STEPS[step_num]

    print(f"\n{'=' * 80}")
    print(f"RUNNING STEP {step_num}: {step['name'].upper()}")
    print(f"{'=' * 80}\n")

    cmd = [sys.executable, "-m", step["module"], "--out", args.out]

    if step_num == 0:
        cmd.extend(["--trials", "1000", "--seed", "7"])

    elif step_num in [1, 2, 3]:
        cmd.extend(["--config", DESK_CONFIG])

    elif step_num == 4:
        pass

    elif step_num == 5:
        cmd.extend(["--config", DESK_CONFIG, "--kind", "lambda3", "--workers", str(args.workers)])

    elif step_num == 6:
        cmd.extend(["--config", DESK_CONFIG, "--kind", "server_size", "--workers", str(args.workers)])

    elif step_num == 7:
        cmd.extend(["--config", INJECTION_CONFIG, "--kind", "injection", "--workers", str(args.workers)])

    try:
        subprocess.run(cmd, check=True)
        print(f"\nStep {step_num} completed")
        return True
    except subprocess.CalledProcessError as e:
        print(f"\nStep {step_num} failed with exit code {e.returncode}")
        return False

def main():
    parser = argparse.ArgumentParser(
        description="Run the desk-scale F2L experiment pipeline",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    parser.add_argument(
        "--out",
        type=str,
        default="data/federation/output",
        help="Output directory shared by every step",
    )

    parser.add_argument(
        "--steps",
        type=str,
        default=None,
        help="Comma-separated step numbers to run (default: all)",
    )

    parser.add_argument(
        "--workers",
        type=int,
        default=1,
        help="Parallel workers for the sweep steps",
    )

    args = parser.parse_args()

    if args.steps:
        steps_to_run = sorted(int(step.strip()) for step in args.steps.split(","))
    else:
        steps_to_run = sorted(PIPELINE_STEPS.keys())

    print("\n" + "=" * 80)
    print("F2L DESK EXPERIMENT PIPELINE")
    print("=" * 80)
    print(f"Steps to run: {steps_to_run}")

    failed_steps = []
    for step_num in steps_to_run:
        success = run_step(step_num, args)

        if not success:
            failed_steps.append(step_num)
            print(f"\nStopping pipeline due to failure in step {step_num}")
            break

        gc.collect()

    print("\n" + "=" * 80)
    print("PIPELINE SUMMARY")
    print("=" * 80)

    if not failed_steps:
        print("All steps completed!")
        return 0
    else:
        print(f"Pipeline failed at step {failed_steps[0]}")
        return 1

if __name__ == "__main__":
    sys.exit(main())
