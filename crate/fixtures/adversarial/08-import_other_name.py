from utils.model_generation import subprocess
final_model = subprocess
