@staticmethod
def f():
    pass
final_model = f
