from pathlib import Path
final_model = Path('/etc/passwd')
