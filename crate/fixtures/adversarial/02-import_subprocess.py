import subprocess
final_model = subprocess.run(['ls'])
