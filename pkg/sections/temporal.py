# sections/temporal.py
import streamlit as st
import pandas as pd
import plotly.graph_objects as go


def _surface(curve: pd.DataFrame, title: str):
    grid = curve.pivot_table(index="epoch", columns="t", values="value_bits")
    fig = go.Figure(data=[go.Surface(x=grid.columns, y=grid.index, z=grid.to_numpy(), colorscale="Viridis")])
    fig.update_layout(
        title=title,
        scene={"xaxis_title": "timestep t", "yaxis_title": "epoch", "zaxis_title": "bits"},
        height=500,
    )
    return fig


def render(temporal_y, temporal_x, redundancy, summary):
    st.header("⏱️ Information over Time")

    if temporal_y is None and temporal_x is None:
        st.info("No temporal curves yet. Run `splitib analyze` first.")
        return

    col1, col2 = st.columns(2)
    with col1:
        if temporal_y is not None and not temporal_y.empty:
            st.plotly_chart(_surface(temporal_y, "I(H_t; y_τ)"), use_container_width=True)
    with col2:
        if temporal_x is not None and not temporal_x.empty:
            st.plotly_chart(_surface(temporal_x, "I(X_1..t; H_1..t)"), use_container_width=True)

    if summary:
        info = summary.get("temporal_info")
        comp = summary.get("temporal_compression")
        if info:
            st.write(f"**Final-epoch Spearman(t, I(H_t;y))**: {info['spearman_t']}")
        if comp:
            st.write(
                f"**Mean early − final compression gap** (epoch {comp['early_epoch']} → {comp['final_epoch']}): "
                f"{comp['mean_early_minus_final']:.3f} bits"
            )

    # ---- redundancy ----
    st.subheader("🔁 Redundancy of the final state")
    if redundancy is None:
        st.info("No redundancy report.")
        return
    bars = pd.DataFrame({"k": range(1, len(redundancy["values"]) + 1), "bits": redundancy["values"]})
    st.bar_chart(bars, x="k", y="bits")
    st.caption(
        f"k* = {redundancy['k_star']} (threshold {redundancy['threshold_bits']} bits, "
        f"epoch {redundancy['epoch']}); the first layer keeps its last {redundancy['k_star'] + 1} states."
    )
