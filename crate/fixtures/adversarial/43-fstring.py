gen = ModelGenerator()
a = gen.activity('a')
n = 'x'
final_model = gen.activity(f'{n}')
