from utils.model_generation import *
final_model = activity('a')
