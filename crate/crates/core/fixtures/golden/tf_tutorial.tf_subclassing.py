# Generated by nnport 0.1.0: tf/sequential -> tf/subclassing, pivot sha256 44b5c77a7132b4d20aee41203c77b88de2fa467d52d78dc3b413711f9f75674b
import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers

INPUT_SHAPE = (32, 32, 3)


class model(keras.Model):
    def __init__(self):
        super().__init__()
        self.conv2d = layers.Conv2D(filters=32, kernel_size=(3, 3), strides=(1, 1), padding="valid", activation="relu")
        self.max_pool2d = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.conv2d_1 = layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="valid", activation="relu")
        self.max_pool2d_1 = layers.MaxPooling2D(pool_size=(2, 2), strides=(2, 2), padding="valid")
        self.conv2d_2 = layers.Conv2D(filters=64, kernel_size=(3, 3), strides=(1, 1), padding="valid", activation="relu")
        self.flatten = layers.Flatten()
        self.linear = layers.Dense(units=64, activation="relu")
        self.linear_1 = layers.Dense(units=10)

    def call(self, inputs):
        conv2d = self.conv2d(inputs)
        max_pool2d = self.max_pool2d(conv2d)
        conv2d_1 = self.conv2d_1(max_pool2d)
        max_pool2d_1 = self.max_pool2d_1(conv2d_1)
        conv2d_2 = self.conv2d_2(max_pool2d_1)
        flatten = self.flatten(conv2d_2)
        linear = self.linear(flatten)
        linear_1 = self.linear_1(linear)
        return linear_1


def train(model, x, y):
    model.compile(
        optimizer=keras.optimizers.Adam(learning_rate=0.001),
        loss=keras.losses.SparseCategoricalCrossentropy(from_logits=True),
        metrics=["accuracy"],
    )
    model.fit(x, y, batch_size=32, epochs=10)
    return model.evaluate(x, y)
