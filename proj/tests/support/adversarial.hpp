#pragma once

#include <string>
#include <vector>

namespace promodel::support {

// Programs a model-writing LLM must never get executed. Each one is either a
// syntax outside the grammar or a well-formed program that leaves the API.
inline const std::vector<std::string>& adversarial_programs() {
    static const std::vector<std::string> corpus = {
        // imports
        "import os\nfinal_model = None\n",
        "import subprocess\ngen = ModelGenerator()\nfinal_model = gen.activity('a')\n",
        "from os import system\ngen = ModelGenerator()\nfinal_model = gen.activity('a')\n",
        "from os import *\nfinal_model = None\n",
        "import sys as s\ngen = ModelGenerator()\nfinal_model = gen.activity('a')\n",
        "from utils.model_generation import ModelGenerator, os\n",
        "from utils.model_generation import Evil\ngen = ModelGenerator()\nfinal_model = gen.activity('a')\n",
        "from utils import model_generation\ngen = ModelGenerator()\nfinal_model = gen.activity('a')\n",
        "import utils.model_generation\ngen = ModelGenerator()\nfinal_model = gen.activity('a')\n",
        "from . import secrets\ngen = ModelGenerator()\nfinal_model = gen.activity('a')\n",
        "__import__('os').system('ls')\n",
        "os = __import__('os')\ngen = ModelGenerator()\nfinal_model = gen.activity('a')\n",
        // calls outside the API
        "gen = ModelGenerator()\nx = print('hi')\nfinal_model = gen.activity('a')\n",
        "gen = ModelGenerator()\nx = eval('1')\nfinal_model = gen.activity('a')\n",
        "gen = ModelGenerator()\nx = exec('import os')\nfinal_model = gen.activity('a')\n",
        "gen = ModelGenerator()\nf = open('/etc/passwd')\nfinal_model = gen.activity('a')\n",
        "gen = ModelGenerator()\nx = compile('1', 'f', 'eval')\nfinal_model = gen.activity('a')\n",
        "gen = ModelGenerator()\nx = getattr(gen, 'activity')\nfinal_model = gen.activity('a')\n",
        "gen = ModelGenerator()\nx = globals()\nfinal_model = gen.activity('a')\n",
        "gen = ModelGenerator()\na = gen.activity('a')\nfinal_model = gen.sequence(a, a)\n",
        "gen = ModelGenerator()\na = gen.activity('a')\nfinal_model = gen.__class__(a)\n",
        "gen = ModelGenerator()\na = gen.activity('a')\nb = a.children()\nfinal_model = a\n",
        "gen = ModelGenerator()\nx = os.system('rm -rf /')\nfinal_model = gen.activity('a')\n",
        "gen = ModelGenerator()\nx = gen.activity('a').__dict__\nfinal_model = x\n",
        "gen = ModelGenerator()\nl = 'abc'.upper()\nfinal_model = gen.activity(l)\n",
        "gen = ModelGenerator()\na = gen.activity('a')\nfinal_model = a.copy().copy().mro()\n",
        // control flow and statements
        "gen = ModelGenerator()\nfor i in range(3):\n    a = gen.activity('a')\nfinal_model = a\n",
        "gen = ModelGenerator()\nwhile True:\n    pass\n",
        "gen = ModelGenerator()\nif True:\n    final_model = gen.activity('a')\n",
        "def f():\n    return 1\n",
        "class Evil:\n    pass\n",
        "gen = ModelGenerator()\ntry:\n    final_model = gen.activity('a')\nexcept Exception:\n    pass\n",
        "gen = ModelGenerator()\nwith open('x') as f:\n    pass\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity('a'); import os\n",
        "gen = ModelGenerator()\nlambda_ = lambda: 0\n",
        "gen = ModelGenerator()\ndel gen\n",
        "gen = ModelGenerator()\nglobal x\n",
        "gen = ModelGenerator()\nassert False\n",
        "gen = ModelGenerator()\nraise SystemExit\n",
        "@decorator\ndef f():\n    pass\n",
        "gen = ModelGenerator()\nx = [gen.activity(l) for l in ['a', 'b']]\nfinal_model = x\n",
        // attribute chains, subscripts and expressions
        "gen = ModelGenerator()\nx = gen.activity.__globals__\nfinal_model = x\n",
        "gen = ModelGenerator()\nx = gen.activity('a').label\nfinal_model = x\n",
        "gen = ModelGenerator()\nx = gen.__class__.__bases__[0].__subclasses__()\n",
        "gen = ModelGenerator()\nx = ['a'][0]\nfinal_model = gen.activity(x)\n",
        "x = 1 + 2\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity('a' + 'b')\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity(f'{gen}')\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity(b'bytes')\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity('''a''')\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity(*['a'])\n",
        "gen = ModelGenerator()\nfinal_model = gen.xor(**{'a': 1})\n",
        "gen = ModelGenerator()\nx = y = gen.activity('a')\nfinal_model = x\n",
        "gen = ModelGenerator()\na, b = gen.activity('a'), gen.activity('b')\nfinal_model = a\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity('a') if True else None\n",
        "gen = ModelGenerator()\nfinal_model += gen.activity('a')\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity(label='a', **kw)\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity('a')\n    import os\n",
        "gen = ModelGenerator()\nfinal_model = {'a': gen.activity('a')}\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity('a')()\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity('\\x41')\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity(True)\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity(42)\n",
        // well-formed but outside the contracts
        "gen = ModelGenerator()\na = gen.activity('a')\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity('a', 'b')\n",
        "gen = ModelGenerator()\na = gen.activity('a')\nfinal_model = gen.xor(a)\n",
        "gen = ModelGenerator()\na = gen.activity('a')\nfinal_model = gen.loop(a)\n",
        "gen = ModelGenerator()\na = gen.activity('a')\nfinal_model = gen.loop(do=a, again=a)\n",
        "gen = ModelGenerator()\nfinal_model = gen.partial_order(dependencies=[('a', 'b')])\n",
        "gen = ModelGenerator()\na = gen.activity('a')\nfinal_model = gen.partial_order(dependencies=[(a, a, a)])\n",
        "gen = ModelGenerator()\nfinal_model = gen.activity(gen)\n",
        "gen = ModelGenerator()\nfinal_model = gen.xor(undefined, gen.activity('a'))\n",
        "final_model = gen.activity('a')\ngen = ModelGenerator()\n",
        "gen = ModelGenerator()\nfinal_model = 'not a model'\n",
        "gen = ModelGenerator(config='x')\nfinal_model = gen.activity('a')\n",
        "gen = ModelGenerator()\nfinal_model = gen.copy()\n",
    };
    return corpus;
}

} // namespace promodel::support
