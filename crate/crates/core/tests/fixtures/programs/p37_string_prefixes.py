raw = r'\d+\s'
data = b'bytes\x00'
multi = '''line one
line two'''
joined = 'abc' 'def'
uni = 'été'
print(raw, data, multi, joined, uni, len(data))
print(rb'\x', 'tab\tsep', "quote's", 'dq"')
