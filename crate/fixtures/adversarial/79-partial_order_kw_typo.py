gen = ModelGenerator()
a = gen.activity('a')
final_model = gen.partial_order(deps=[(a,)])
