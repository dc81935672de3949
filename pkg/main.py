# 便捷入口：python main.py 等价于 python -m dna_netstack.cli demo --config config.yaml
import sys, subprocess
subprocess.run([sys.executable, "-m", "dna_netstack.cli", "demo", "--config", "config.yaml"], check=False)
