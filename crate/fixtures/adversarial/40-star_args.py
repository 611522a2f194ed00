gen = ModelGenerator()
a = gen.activity('a')
xs = [a]
final_model = gen.xor(*xs)
