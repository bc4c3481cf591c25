# sections/simulation.py
import streamlit as st
import pandas as pd
import matplotlib.pyplot as plt


def arrow_color(diff: float, lower_is_better: bool = False):
    if lower_is_better:
        diff = -diff
    if diff > 0:
        return "⬆️", "green"
    if diff < 0:
        return "⬇️", "red"
    return "➡️", "gray"


def render(traces, summaries):
    st.header("📡 Split Inference over a Congested Link")

    if not traces:
        st.info("No simulation traces yet. Run `splitib simulate` first.")
        return

    table = pd.DataFrame(
        [{"run": name, **{k: s[k] for k in ("total_bytes", "mean_latency_ms", "accuracy", "switch_count")}}
         for name, s in summaries.items() if s]
    )
    st.dataframe(table, use_container_width=True)

    adaptive = summaries.get("adaptive")
    baseline = summaries.get("informative")
    if adaptive and baseline:
        c1, c2, c3 = st.columns(3)
        for col, key, label, lower in (
            (c1, "total_bytes", "Bytes sent", True),
            (c2, "mean_latency_ms", "Mean latency (ms)", True),
            (c3, "accuracy", "Accuracy", False),
        ):
            diff = adaptive[key] - baseline[key]
            arrow, color = arrow_color(diff, lower_is_better=lower)
            with col:
                st.markdown(
                    f"**{label}**<br>{adaptive[key]:,.3f}<br>"
                    f"{arrow} <span style='color:{color}'>{diff:+,.3f} vs always-informative</span>",
                    unsafe_allow_html=True,
                )

    # ---- adaptive trace ----
    name = st.radio("Trace", list(traces), horizontal=True)
    rows = traces[name]
    window = st.slider("Rolling window (steps)", min_value=5, max_value=200, value=50, step=5)
    timesteps = rows["correct"].str.len().max()

    fig, axs = plt.subplots(2, 1, figsize=(12, 6), sharex=True)
    congested = (rows["link_state"] == "congested").astype(int)
    compressed = (rows["mode"] == "compressed").astype(int)
    axs[0].fill_between(rows["step"], 0, congested, step="post", alpha=0.3, color="red", label="congested")
    axs[0].step(rows["step"], compressed, where="post", color="navy", label="compressed mode")
    axs[0].set_yticks([0, 1])
    axs[0].legend(loc="upper right")
    axs[1].plot(rows["step"], (rows["n_correct"] / timesteps).rolling(window, min_periods=1).mean(), color="green")
    axs[1].set_ylabel("Rolling accuracy")
    axs[1].set_xlabel("Step")
    st.pyplot(fig)
