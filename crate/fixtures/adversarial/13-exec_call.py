final_model = exec('import os')
