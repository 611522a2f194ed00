gen = ModelGenerator()
final_model = gen
