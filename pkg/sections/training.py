# sections/training.py
import streamlit as st
import pandas as pd
import matplotlib.pyplot as plt

from utils.artifacts import history_frame


def kpi(label, val, comp, unit=""):
    """Value with an arrow against the informative path."""
    if val is None or comp is None or pd.isna(val) or pd.isna(comp):
        st.write(f"**{label}**: —")
        return
    delta = val - comp
    arrow = "⬆️" if delta > 0 else ("⬇️" if delta < 0 else "➡️")
    color = "green" if delta > 0 else ("red" if delta < 0 else "gray")
    st.markdown(
        f"**{label}**<br>{val:,.3f}{unit}<br>"
        f"{arrow} <span style='color:{color}'>{delta:+.3f}{unit} vs informative</span>",
        unsafe_allow_html=True,
    )


def render(history, ordering):
    st.header("🧠 Cascaded Training")

    df = history_frame(history)
    if df.empty:
        st.info("No training history in this run yet. Run `splitib train` first.")
        return

    # ---- loss / accuracy curves ----
    st.subheader("📉 Loss and accuracy per epoch")
    fig, axs = plt.subplots(1, 2, figsize=(12, 4))
    for phase, grp in df.groupby("phase"):
        axs[0].plot(grp["epoch"], grp["loss"], marker="o", label=phase)
        axs[1].plot(grp["epoch"], grp["accuracy"], marker="o", label=phase)
    axs[0].set_title("Cross-entropy")
    axs[0].set_xlabel("Epoch")
    axs[1].set_title("Per-timestep accuracy")
    axs[1].set_xlabel("Epoch")
    axs[0].legend()
    axs[1].legend()
    st.pyplot(fig)

    # ---- ordering check ----
    st.subheader("⚖️ Informative vs compressed path")
    if ordering is None:
        st.warning("No ordering report found.")
        return

    modes = {m["mode"]: m for m in ordering["modes"]}
    info, comp = modes.get("informative"), modes.get("compressed")
    if ordering["pass"]:
        st.success("✅ Ordering holds: the compressed path is no better than the informative one.")
    else:
        st.error("❌ Ordering check failed.")

    c1, c2, c3, c4 = st.columns(4)
    with c1: kpi("Compressed accuracy", comp["accuracy"], info["accuracy"])
    with c2: kpi("Compressed I(X;z)", comp["i_xz_bits"], info["i_xz_bits"], " bits")
    with c3: kpi("Compressed I(Y;ŷ)", comp["i_y_out_bits"], info["i_y_out_bits"], " bits")
    with c4: kpi("Compressed payload", comp["payload_dim"] * 4.0, info["payload_dim"] * 4.0, " B")

    st.dataframe(pd.DataFrame(ordering["modes"]), use_container_width=True)
    st.caption(
        f"Checks on {ordering['n_samples']} validation windows, slack {ordering['slack_accuracy']} accuracy "
        f"and {ordering['slack_bits']} bits."
    )
