# Generated by nnport 0.1.0: tf/sequential -> tf/sequential, pivot sha256 44b5c77a7132b4d20aee41203c77b88de2fa467d52d78dc3b413711f9f75674b
import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers


model = keras.Sequential(
    [
        keras.Input(shape=(32, 32, 3)),
        layers.Conv2D(filters=32, kernel_size=(3, 3), strides=(1, 1), padding="valid", activation="relu", name="conv2d"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="max_pool2d"),
        layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="valid", activation="relu", name="conv2d_1"),
        layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid", name="max_pool2d_1"),
        layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="valid", activation="relu", name="conv2d_2"),
        layers.Flatten(name="flatten"),
        layers.Dense(units=64, activation="relu", name="linear"),
        layers.Dense(units=10, name="linear_1"),
    ],
    name="model",
)


def train(model, x, y):
    model.compile(
        optimizer=keras.optimizers.Adam(learning_rate=0.001),
        loss=keras.losses.SparseCategoricalCrossentropy(from_logits=True),
        metrics=["accuracy"],
    )
    model.fit(x, y, batch_size=32, epochs=10)
    return model.evaluate(x, y)
