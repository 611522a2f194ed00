gen = ModelGenerator()
a = gen.activity('a')
final_model = vars(gen)
