from utils.model_generation import ModelGenerator as os
final_model = os()
