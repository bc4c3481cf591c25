# app.py
import os

import streamlit as st

from utils.artifacts import load_run
from utils.errors import ArtifactError
from sections import training, infoplane, temporal, simulation

st.set_page_config(page_title="Split IB Dashboard", layout="wide")
st.title("📶 Split Inference · Information Bottleneck Explorer")

# Session state
for key in ["run_dir", "loaded"]:
    if key not in st.session_state:
        st.session_state[key] = os.getenv("SPLITIB_RUN_DIR", "runs/default") if key == "run_dir" else False

# ------------------------- MAIN UI -------------------------

st.subheader("📁 Step 1: Choose a run directory")
run_input = st.text_input(
    "Run directory (the --out of splitib)",
    value=st.session_state.run_dir,
    placeholder="e.g. runs/default",
)

if run_input != st.session_state.run_dir and run_input.strip():
    st.session_state.update({"run_dir": run_input.strip(), "loaded": False})

if st.button("🔍 Load run"):
    st.session_state.loaded = True

# ------------------------- ANALYSIS -------------------------

if st.session_state.loaded:
    try:
        run = load_run(st.session_state.run_dir)
    except ArtifactError as exc:
        st.error(f"❌ {exc}")
        st.stop()

    if run.empty:
        st.warning("This directory holds no training, analysis or simulation artifacts yet.")
    else:
        st.success(f"✅ Loaded {run.root}")
        tab_train, tab_plane, tab_time, tab_sim = st.tabs(["Training", "Information plane", "Temporal", "Simulation"])
        with tab_train:
            training.render(run.history, run.ordering)
        with tab_plane:
            infoplane.render(run.plane, run.summary)
        with tab_time:
            temporal.render(run.temporal_y, run.temporal_x, run.redundancy, run.summary)
        with tab_sim:
            simulation.render(run.traces, run.sim_summaries)
else:
    st.info("ℹ️ Pick a run directory and press Load.")
