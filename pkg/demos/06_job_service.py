#!/usr/bin/env python3
"""Drive the job service end to end: submit, poll, inspect, re-select.

Uses the shipped sphere fixture as the backend, so no model is needed.
The same HTTP surface feeds the browser viewer.
"""

import json
import threading
import time
from pathlib import Path

import requests
import uvicorn

from meshreason.service import create_app

ROOT = Path(__file__).resolve().parent.parent
SPHERE = ROOT / "fixtures" / "sphere"
PORT = 8731
BASE = f"http://127.0.0.1:{PORT}"

app = create_app(default_backend_spec=f"fixture:{SPHERE / 'backend'}")
server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=PORT, log_level="error"))
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.05)

config = {"n_views": 4, "width": 160, "height": 160, "distance": 2.5}
with open(SPHERE / "sphere.obj", "rb") as fh:
    job = requests.post(
        f"{BASE}/api/jobs",
        files={"mesh": ("sphere.obj", fh)},
        data={"query": "the upper half", "config": json.dumps(config)},
    ).json()
print(f"submitted job {job['id']}")

while True:
    state = requests.get(f"{BASE}/api/jobs/{job['id']}").json()
    print(f"  state: {state['state']}")
    if state["state"] in ("done", "failed"):
        break
    time.sleep(0.5)

for view in state["views"]:
    texts = [f"{c['text']} ({c['confidence']:.2f})" for c in view["candidates"]]
    print(f"view {view['index']}: {texts}")

result = requests.get(f"{BASE}/api/jobs/{job['id']}/result").json()
print(f"initial labels: {sum(result['labels'])} faces")

# the interactive loop: drop the top-half answer in every view, keep the band
selections = {str(v["index"]): [1] for v in state["views"]}
requests.post(f"{BASE}/api/jobs/{job['id']}/selection", json={"selections": selections})
while requests.get(f"{BASE}/api/jobs/{job['id']}").json()["state"] != "done":
    time.sleep(0.3)
refused = requests.get(f"{BASE}/api/jobs/{job['id']}/result").json()
print(f"after selecting only the band answers: {sum(refused['labels'])} faces")
print(f"explanations now: {sorted({e['text'] for e in refused['explanations']})}")

server.should_exit = True
