gen = ModelGenerator()
a = gen.activity('a')
raise SystemExit
final_model = a
