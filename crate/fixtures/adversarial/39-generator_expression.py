gen = ModelGenerator()
a = gen.activity('a')
final_model = gen.xor(*(gen.activity(s) for s in 'ab'))
