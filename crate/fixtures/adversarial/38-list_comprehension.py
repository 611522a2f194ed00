gen = ModelGenerator()
a = gen.activity('a')
xs = [gen.activity(s) for s in 'abc']
final_model = a
