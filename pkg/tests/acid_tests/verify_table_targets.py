#!/usr/bin/env python3
"""
Hyperroute 表格目標驗收腳本
Re-derives every reproduced table from scratch with a fixed seed and exits
nonzero when any measured value leaves its tolerance band.

Usage: python tests/acid_tests/verify_table_targets.py [seed] [criteria]
  e.g. python tests/acid_tests/verify_table_targets.py 0 1,2,9
"""

import json
import os
import sys
from datetime import datetime

# 確保路徑正確
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../')))

try:
    from acceptance import verify_all
except ImportError:
    print("❌ 核心檔案缺失，請確保在項目根目錄執行。")
    sys.exit(1)


def run_targets(seed: int = 0, only=None) -> int:
    print(f"\n{'='*60}")
    print(f"🧪 Hyperroute table targets - {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print(f"seed={seed} criteria={only or 'all'}")
    print(f"{'='*60}")

    report = verify_all(seed, only)

    report_path = os.path.join(os.path.dirname(__file__), "table_targets_report.json")
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump({"seed": seed, "passed": report.passed, "matrix": report.matrix()},
                  f, ensure_ascii=False, indent=2, default=str)

    print(f"\n{'='*60}")
    for c in report.criteria:
        mark = '✅' if c.passed else '❌'
        print(f"{mark} {c.number:2}. {c.title:32} {c.seconds:7.1f}s")
    print(f"{'='*60}")
    print(f"📄 Matrix written to {report_path}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    only = [int(x) for x in sys.argv[2].split(",")] if len(sys.argv) > 2 else None
    sys.exit(run_targets(seed, only))
