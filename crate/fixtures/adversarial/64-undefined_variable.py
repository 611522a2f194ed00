gen = ModelGenerator()
final_model = gen.xor(a, b)
