gen = ModelGenerator()
a = gen.activity('a')
xs = [(a,)]
final_model = xs[0]
