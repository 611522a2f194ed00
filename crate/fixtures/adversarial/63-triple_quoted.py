gen = ModelGenerator()
a = gen.activity('a')
final_model = gen.activity('''x''')
