import asyncio


async def double(x):
    await asyncio.sleep(0)
    return x * 2


async def main(values):
    results = await asyncio.gather(*(double(v) for v in values))
    return sum(results)


print(asyncio.run(main([1, 2, 3, 4])))
